#
# Copyright 2024 The sidetrace authors
#
# Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance with the
# License. You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software distributed under the License is distributed on an
# "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#
# See the License for the specific language governing permissions and limitations under the License.
#

"""Command line surface of sidetrace.

    sidetrace fingerprint --theta 0.3 --rate 3.125e9 --clock 8e6 in.psct out.json

Exit status is 0 on success, 1 on invalid input or usage, 2 when processing valid input fails. Diagnostics go to
standard error, data only to files or standard output.

"""

import argparse
import logging
import sys

from findatapy.util.loggermanager import LoggerManager

from sidetrace.analysis.crashclustering import CrashClustering
from sidetrace.analysis.fingerprintcomparison import FingerprintComparison
from sidetrace.analysis.motifdetection import MotifDetection
from sidetrace.filters.filterspec import FilterSpec
from sidetrace.filters.tracefilter import TraceFilter
from sidetrace.peripheral.peakdetector import PeakDetector
from sidetrace.peripheral.peaksegment import SpiDecodeConfig
from sidetrace.peripheral.spidecoder import SpiDecoder
from sidetrace.plot.svgplot import SvgPlot
from sidetrace.synth.synthscript import GroundTruth, SpiSynthConfig
from sidetrace.synth.tracesynthesizer import TraceSynthesizer
from sidetrace.trace.traceio import TraceIO
from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceException, SideTraceProcessingError, SideTraceValidationError
from sidetrace.wavelet.fingerprint import FingerprintRequest
from sidetrace.wavelet.waveletfingerprint import WaveletFingerprint
from sidetrace.wavelet.waveletspec import WaveletSpec

constants = SideTraceConstants()

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PROCESSING = 2

# every logger the package creates
_LOGGER_NAMES = ['sidetrace.analysis.crashclustering', 'sidetrace.analysis.fingerprintcomparison',
                 'sidetrace.analysis.motifdetection', 'sidetrace.filters.tracefilter',
                 'sidetrace.peripheral.peakdetector', 'sidetrace.peripheral.spidecoder', 'sidetrace.plot.svgplot',
                 'sidetrace.synth.tracesynthesizer', 'sidetrace.trace.traceio', 'sidetrace.wavelet.waveletfingerprint',
                 'sidetrace.cli.sidetracecli']


class SideTraceArgumentParser(argparse.ArgumentParser):
    """Raises instead of exiting, so usage errors map onto the validation exit status."""

    def error(self, message):
        raise SideTraceValidationError(self.prog + ": " + message + "\n" + self.format_usage().strip())


class _CliStderrHandler(logging.StreamHandler):
    """The only handler main() attaches, and the only one it removes again."""


def _configure_logging(level):
    # creating every logger first loads the logging configuration once, before it is adjusted here
    loggers = [LoggerManager().getLogger(name) for name in _LOGGER_NAMES]

    handler = _CliStderrHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))

    saved = []

    for logger in loggers:
        saved.append((logger, logger.level, logger.propagate))

        logger.addHandler(handler)
        logger.setLevel(level)

        # standard output is reserved for data, records never reach the root handlers
        logger.propagate = False

    return handler, saved


def _restore_logging(handler, saved):
    for logger, level, propagate in saved:
        logger.removeHandler(handler)
        logger.setLevel(level)
        logger.propagate = propagate

    handler.close()


def _write_trace(trace, path):
    if str(path).lower().endswith('.csv'):
        TraceIO().save_trace_csv(trace, path)
    else:
        TraceIO().save_trace_bin(trace, path)


def _write_json(obj, path):
    TraceIO().write_json(obj, path if path is not None else sys.stdout.buffer)


def _load_trace(args):
    return TraceIO().load_trace(args.input, sample_rate_hz=args.rate, clock_hz=getattr(args, 'clock', None))


##### subcommands
def _cmd_filter(args):
    trace = _load_trace(args)

    spec = FilterSpec(args.kind, cutoff_low_hz=args.low, cutoff_high_hz=args.high, order=args.order,
                      phase_mode=args.phase)

    _write_trace(TraceFilter().apply(trace, spec), args.output)


def _cmd_spectrum(args):
    trace_filter = TraceFilter()

    peaks = trace_filter.spectral_peaks(trace_filter.fft_forward(_load_trace(args)), args.top_k)

    text = peaks.to_csv(index=False, float_format='%.17g', lineterminator='\n')

    if args.output is None:
        sys.stdout.write(text)
    else:
        with open(args.output, 'w', encoding='utf-8', newline='') as f:
            f.write(text)


def _cmd_fingerprint(args):
    trace = _load_trace(args)

    samples_per_clock = trace.require_samples_per_clock()

    if args.highpass is not None and args.lowpass is not None:
        raise SideTraceValidationError("--highpass and --lowpass are mutually exclusive")

    prefilter = None

    if args.highpass is not None:
        prefilter = FilterSpec.highpass(args.highpass)
    elif args.lowpass is not None:
        prefilter = FilterSpec.lowpass(args.lowpass)

    if args.scales is not None and args.scales < 1:
        raise SideTraceValidationError("--scales must be >= 1, got " + str(args.scales))

    wavelet_spec = WaveletSpec.default(samples_per_clock, family=args.family,
                                       count=args.scales if args.scales is not None else constants.wavelet_scale_count)

    fr = FingerprintRequest(theta=args.theta, wavelet_spec=wavelet_spec, prefilter=prefilter,
                            excise_peripheral=args.excise, slot_radius=args.slot_radius, peak_k=args.peak_k)

    fp, diagnostics = WaveletFingerprint().fingerprint(trace, fr, return_diagnostics=True)

    TraceIO().save_fingerprint_json(fp, args.output)

    if args.diagnostics is not None:
        _write_json(diagnostics.to_dict(), args.diagnostics)

    if args.scalogram is not None:
        TraceIO().save_scalogram_bin(diagnostics.scalogram, args.scalogram)

    if args.svg is not None:
        SvgPlot().plot_trace(trace, args.svg, fingerprint=fp, segments=diagnostics.excised_segments)


def _cmd_compare(args):
    trace_io = TraceIO()

    report = FingerprintComparison().compare_fingerprints(trace_io.load_fingerprint_json(args.fingerprint_a),
                                                          trace_io.load_fingerprint_json(args.fingerprint_b),
                                                          metric=args.metric, smoothing_halfwidth=args.smoothing)

    _write_json(report.to_dict(), args.output)


def _cmd_motif(args):
    fp = TraceIO().load_fingerprint_json(args.input)

    max_period = args.max_period if args.max_period is not None else fp.span_cycles // 2

    report = MotifDetection().detect_motif(fp, args.min_period, max_period, smoothing_halfwidth=args.smoothing)

    _write_json(report.to_dict() if report is not None else None, args.output)

    if args.svg is not None:
        SvgPlot().plot_fingerprint(fp, args.svg, smoothing_halfwidth=args.smoothing, motif=report)


def _cmd_peaks(args):
    trace = _load_trace(args)

    peak_detector = PeakDetector()

    segments = peak_detector.detect_peaks(trace, k=args.k, merge_gap=args.merge_gap)
    excised = peak_detector.excise(trace, segments, guard=args.guard)

    _write_json({'segments': [s.to_dict() for s in segments],
                 'removed': [list(r) for r in excised.removed],
                 'removed_samples': excised.removed_samples}, args.output)

    if args.excised is not None:
        _write_trace(excised.trace, args.excised)

    if args.clip is not None:
        clipped, offset = peak_detector.clip_between_peaks(trace, segments, guard=args.guard)
        _write_trace(clipped, args.clip)


def _cmd_decode_spi(args):
    trace = _load_trace(args)

    cfg = SpiDecodeConfig(clock_peak_k=args.k, bit_order=args.bit_order, idle_level=args.idle)

    result = SpiDecoder().decode_spi(trace, cfg)

    if args.details is not None:
        _write_json(result.to_dict(), args.details)

    if args.binary:
        if args.output is None:
            sys.stdout.buffer.write(result.data)
        else:
            with open(args.output, 'wb') as f:
                f.write(result.data)
    else:
        if args.output is None:
            sys.stdout.write(result.hex() + '\n')
        else:
            with open(args.output, 'w', encoding='utf-8', newline='') as f:
                f.write(result.hex() + '\n')


def _cmd_cluster(args):
    trace_io = TraceIO()

    traces = [trace_io.load_trace(p, sample_rate_hz=args.rate) for p in args.inputs]

    report = CrashClustering().cluster_crashes(traces, args.lowpass, linkage_threshold=args.threshold)

    _write_json(report.to_dict(), args.output)


def _cmd_synth(args):
    trace_io = TraceIO()

    trace, truth = TraceSynthesizer().synth_trace(trace_io.load_script_json(args.script))

    _write_trace(trace, args.trace_output)
    _write_json(truth.to_dict(), args.truth_output)


def _cmd_synth_spi(args):
    try:
        data = bytes.fromhex(args.bytes)
    except ValueError:
        raise SideTraceValidationError("BYTES must be hex text, got " + repr(args.bytes))

    cfg = SpiSynthConfig(samples_per_clock_edge=args.edge_samples, clock_peak_amp=args.clock_amp,
                         data_peak_amp=args.data_amp, noise_sigma=args.noise, seed=args.seed,
                         sample_rate_hz=args.rate if args.rate is not None else constants.synth_spi_sample_rate_hz)

    trace, truth = TraceSynthesizer().synth_spi(data, cfg)

    _write_trace(trace, args.trace_output)
    _write_json(truth.to_dict(), args.truth_output)


def _cmd_evaluate(args):
    trace_io = TraceIO()

    fp = trace_io.load_fingerprint_json(args.fingerprint)
    truth = GroundTruth.from_dict(trace_io.read_json(args.truth))

    score = FingerprintComparison().score_fingerprint(fp, truth.branch_cycles, tolerance_cycles=args.tolerance)

    _write_json(score.to_dict(), args.output)


def _cmd_spinloop(args):
    fp = TraceIO().load_fingerprint_json(args.input)

    report = MotifDetection().detect_spin_loop(fp, max_period=args.max_period, min_repeats=args.min_repeats)

    _write_json(report.to_dict(), args.output)


def _add_rates(p, clock=True):
    p.add_argument('--rate', type=float, default=None, help='sample rate in Hz (required for single column CSV)')

    if clock:
        p.add_argument('--clock', type=float, default=None, help='device clock in Hz')


def build_parser():
    parser = SideTraceArgumentParser(prog='sidetrace', description='Power side-channel trace analysis')
    parser.add_argument('--log-level', default='WARNING', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])

    sub = parser.add_subparsers(dest='command', parser_class=SideTraceArgumentParser)
    sub.required = True

    p = sub.add_parser('filter', help='apply a filter and write the filtered trace')
    p.add_argument('input')
    p.add_argument('output')
    p.add_argument('--kind', required=True, choices=list(FilterSpec.KINDS))
    p.add_argument('--low', type=float, default=None, help='low cutoff in Hz (bandpass, highpass)')
    p.add_argument('--high', type=float, default=None, help='high cutoff in Hz (bandpass, lowpass)')
    p.add_argument('--order', type=int, default=constants.filter_butterworth_order)
    p.add_argument('--phase', default=constants.filter_phase_mode, choices=list(FilterSpec.PHASE_MODES))
    _add_rates(p)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser('spectrum', help='top-k spectral peaks as CSV')
    p.add_argument('input')
    p.add_argument('output', nargs='?', default=None)
    p.add_argument('--top-k', type=int, default=10)
    _add_rates(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser('fingerprint', help='wavelet control-flow fingerprint of a trace')
    p.add_argument('input')
    p.add_argument('output')
    p.add_argument('--theta', type=float, default=constants.wavelet_theta)
    p.add_argument('--family', default=constants.wavelet_family, choices=list(WaveletSpec.FAMILIES))
    p.add_argument('--scales', type=int, default=None, help='number of wavelet scales')
    p.add_argument('--highpass', type=float, default=None, help='Butterworth high-pass prefilter cutoff in Hz')
    p.add_argument('--lowpass', type=float, default=None, help='Butterworth low-pass prefilter cutoff in Hz')
    p.add_argument('--excise', action='store_true', help='excise peripheral peaks first')
    p.add_argument('--peak-k', type=float, default=constants.peak_mad_k)
    p.add_argument('--slot-radius', type=int, default=constants.wavelet_slot_radius)
    p.add_argument('--svg', default=None)
    p.add_argument('--diagnostics', default=None, help='diagnostics JSON output')
    p.add_argument('--scalogram', default=None, help='PSCW scalogram output')
    _add_rates(p)
    p.set_defaults(func=_cmd_fingerprint)

    p = sub.add_parser('compare', help='similarity of two fingerprints')
    p.add_argument('fingerprint_a')
    p.add_argument('fingerprint_b')
    p.add_argument('--metric', default=constants.compare_metric, choices=list(FingerprintComparison.METRICS))
    p.add_argument('--smoothing', type=int, default=constants.compare_smoothing_halfwidth)
    p.add_argument('--output', default=None)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser('motif', help='repeated motif (eg. cipher rounds) in a fingerprint')
    p.add_argument('input')
    p.add_argument('--min-period', type=int, default=2)
    p.add_argument('--max-period', type=int, default=None, help='defaults to half the fingerprint span')
    p.add_argument('--smoothing', type=int, default=constants.motif_smoothing_halfwidth)
    p.add_argument('--svg', default=None)
    p.add_argument('--output', default=None)
    p.set_defaults(func=_cmd_motif)

    p = sub.add_parser('peaks', help='detect and excise peripheral peaks')
    p.add_argument('input')
    p.add_argument('--k', type=float, default=constants.peak_mad_k)
    p.add_argument('--merge-gap', type=int, default=None)
    p.add_argument('--guard', type=int, default=None)
    p.add_argument('--excised', default=None, help='excised trace output')
    p.add_argument('--clip', default=None, help='longest peak free stretch output')
    p.add_argument('--output', default=None)
    _add_rates(p)
    p.set_defaults(func=_cmd_peaks)

    p = sub.add_parser('decode-spi', help='decode SPI bytes from a trace')
    p.add_argument('input')
    p.add_argument('--k', type=float, default=constants.spi_clock_peak_k)
    p.add_argument('--bit-order', default=constants.spi_bit_order, choices=list(SpiDecodeConfig.BIT_ORDERS))
    p.add_argument('--idle', default=constants.spi_idle_level, choices=list(SpiDecodeConfig.IDLE_LEVELS))
    p.add_argument('--binary', action='store_true', help='raw bytes instead of hex text')
    p.add_argument('--details', default=None, help='decode details JSON output')
    p.add_argument('--output', default=None)
    _add_rates(p, clock=False)
    p.set_defaults(func=_cmd_decode_spi)

    p = sub.add_parser('cluster', help='cluster crash traces')
    p.add_argument('inputs', nargs='+')
    p.add_argument('--lowpass', type=float, required=True, help='low-pass cutoff in Hz')
    p.add_argument('--threshold', type=float, default=constants.crash_linkage_threshold)
    p.add_argument('--output', default=None)
    _add_rates(p, clock=False)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser('synth', help='synthesize a trace from a script')
    p.add_argument('script')
    p.add_argument('trace_output')
    p.add_argument('truth_output')
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser('synth-spi', help='synthesize an SPI trace')
    p.add_argument('bytes', help='hex text, eg. a5ff00')
    p.add_argument('trace_output')
    p.add_argument('truth_output')
    p.add_argument('--edge-samples', type=int, default=constants.synth_spi_samples_per_clock_edge)
    p.add_argument('--clock-amp', type=float, default=1.0)
    p.add_argument('--data-amp', type=float, default=0.3)
    p.add_argument('--noise', type=float, default=0.03)
    p.add_argument('--seed', type=int, default=0)
    _add_rates(p, clock=False)
    p.set_defaults(func=_cmd_synth_spi)

    p = sub.add_parser('evaluate', help='score a fingerprint against ground truth')
    p.add_argument('fingerprint')
    p.add_argument('truth')
    p.add_argument('--tolerance', type=int, default=constants.score_tolerance_cycles)
    p.add_argument('--output', default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser('spinloop', help='detect a trailing spin loop in a fingerprint')
    p.add_argument('input')
    p.add_argument('--max-period', type=int, default=constants.spin_loop_max_period)
    p.add_argument('--min-repeats', type=int, default=constants.spin_loop_min_repeats)
    p.add_argument('--output', default=None)
    p.set_defaults(func=_cmd_spinloop)

    return parser


def main(argv=None):
    """Runs one subcommand.

    Parameters
    ----------
    argv : list of str
        defaults to sys.argv[1:]

    Returns
    -------
    int
        exit status
    """
    try:
        args = build_parser().parse_args(argv)
    except SideTraceValidationError as e:
        sys.stderr.write(str(e) + "\n")

        return EXIT_VALIDATION

    handler, saved = _configure_logging(args.log_level)

    try:
        return _run(args)
    finally:
        _restore_logging(handler, saved)


def _run(args):
    logger = LoggerManager().getLogger('sidetrace.cli.sidetracecli')

    try:
        args.func(args)
    except SideTraceValidationError as e:
        logger.error(str(e))

        return EXIT_VALIDATION
    except ValueError as e:
        logger.error(str(e))

        return EXIT_VALIDATION
    except SideTraceProcessingError as e:
        logger.error(str(e))

        return EXIT_PROCESSING
    except OSError as e:
        logger.error((str(e.filename) + ": " if e.filename else "") + (e.strerror or str(e)))

        return EXIT_VALIDATION
    except SideTraceException as e:
        logger.error(str(e))

        return EXIT_PROCESSING

    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
