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

import math

import numpy

from findatapy.util.loggermanager import LoggerManager

from sidetrace.synth.synthscript import GroundTruth, SpiSynthConfig, SynthScript
from sidetrace.trace.powertrace import PowerTrace
from sidetrace.util.sidetraceerrors import SideTraceValidationError

# noise is drawn in fixed size blocks, each keyed by (seed, block index)
NOISE_BLOCK = 65536

# Gaussian envelopes are evaluated out to this many standard deviations
ENVELOPE_SIGMAS = 8.0

# ring-downs are evaluated out to this many time constants
RING_TIME_CONSTANTS = 30.0


def counter_noise(seed, n):
    """Standard normal noise where sample i depends only on (seed, i // NOISE_BLOCK), so any block can be generated
    on its own and in any order.

    Parameters
    ----------
    seed : int
    n : int

    Returns
    -------
    numpy.ndarray
    """
    blocks = []

    for b in range(int(math.ceil(n / float(NOISE_BLOCK)))):
        rng = numpy.random.Generator(numpy.random.Philox(key=seed, counter=[0, b, 0, 0]))

        blocks.append(rng.standard_normal(min(NOISE_BLOCK, n - b * NOISE_BLOCK)))

    if not blocks:
        return numpy.zeros(0)

    return numpy.concatenate(blocks)


def burst_waveform(n, cycle, samples_per_clock, amplitude):
    """Gaussian windowed cosine centred on the middle of the cycle, half-width and carrier period of a quarter clock
    cycle, peak exactly at the centre."""
    centre = (cycle + 0.5) * samples_per_clock
    sigma = samples_per_clock / 4.0
    period = samples_per_clock / 4.0

    lo = max(0, int(math.floor(centre - ENVELOPE_SIGMAS * sigma)))
    hi = min(n, int(math.ceil(centre + ENVELOPE_SIGMAS * sigma)) + 1)

    t = numpy.arange(lo, hi) - centre

    return lo, amplitude * numpy.exp(-0.5 * (t / sigma) ** 2) * numpy.cos(2 * numpy.pi * t / period)


def spike_waveform(n, cycle, samples_per_clock, amplitude, ring_decay_cycles):
    """Peripheral spike at the start of the cycle, ringing down exponentially at the clock frequency."""
    start = int(round(cycle * samples_per_clock))
    tau = ring_decay_cycles * samples_per_clock

    hi = min(n, start + int(math.ceil(RING_TIME_CONSTANTS * tau)) + 1)

    t = numpy.arange(start, hi) - start

    return start, amplitude * numpy.exp(-t / tau) * numpy.cos(2 * numpy.pi * t / samples_per_clock)


def gaussian_pulse(n, position, sigma, amplitude):
    lo = max(0, int(math.floor(position - ENVELOPE_SIGMAS * sigma)))
    hi = min(n, int(math.ceil(position + ENVELOPE_SIGMAS * sigma)) + 1)

    t = numpy.arange(lo, hi) - position

    return lo, amplitude * numpy.exp(-0.5 * (t / sigma) ** 2)


class TraceSynthesizer(object):
    """Generates synthetic power traces with known ground truth, so that every analysis can be checked without bench
    hardware. Output is a pure function of the script (seed included).

    """

    def __init__(self):
        self.logger = LoggerManager().getLogger(__name__)

    def _event_waveform(self, script, n, include_peripheral=True):
        x = numpy.zeros(n)

        for c, a in script.branch_events:
            lo, w = burst_waveform(n, c, script.samples_per_clock, a)
            x[lo:lo + len(w)] += w

        segments = []

        if include_peripheral:
            for c, a, d in script.peripheral_events:
                start, w = spike_waveform(n, c, script.samples_per_clock, a, d)
                x[start:start + len(w)] += w

                # report the part of the ring-down above 1% of the spike
                segments.append((start, min(n, start + int(math.ceil(math.log(100.0) * d * script.samples_per_clock)))))

        return x, segments

    def _background(self, script, n):
        t = numpy.arange(n)

        x = numpy.full(n, script.baseline_volts)

        if script.white_sigma > 0:
            x = x + script.white_sigma * counter_noise(script.seed, n)

        if script.drift_amplitude > 0 and script.drift_freq_hz > 0:
            x = x + script.drift_amplitude * numpy.sin(2 * numpy.pi * script.drift_freq_hz * t / script.sample_rate_hz)

        return x

    def synth_trace(self, script, include_peripheral=True):
        """Synthesizes the trace of a script.

        Parameters
        ----------
        script : SynthScript
        include_peripheral : bool
            False gives the peripheral free twin (identical noise)

        Returns
        -------
        PowerTrace, GroundTruth
        """
        if not isinstance(script, SynthScript):
            raise SideTraceValidationError("synth_trace needs a SynthScript")

        n = script.sample_count

        events, segments = self._event_waveform(script, n, include_peripheral=include_peripheral)

        self.logger.debug("Synthesized " + str(n) + " samples with " + str(len(script.branch_events))
                          + " branch events")

        trace = PowerTrace(self._background(script, n) + events, script.sample_rate_hz, clock_hz=script.clock_hz,
                           label='synth-' + str(script.seed))

        return trace, GroundTruth(branch_cycles=[c for c, _ in script.branch_events], peripheral_segments=segments)

    def synth_twins(self, script):
        """The (with peripheral, without peripheral) pair of noise identical traces, and the ground truth of the
        first one."""
        with_peripheral, truth = self.synth_trace(script, include_peripheral=True)
        without_peripheral, _ = self.synth_trace(script, include_peripheral=False)

        return with_peripheral, without_peripheral, truth

    def synth_spi(self, data, spi_synth_config=None):
        """Power trace of an SPI master sending bytes in mode 0: every rising clock edge is a voltage drop, every data
        line transition (half a clock period earlier) is a drop when the line rises and a rise when it falls.

        Parameters
        ----------
        data : bytes
        spi_synth_config : SpiSynthConfig

        Returns
        -------
        PowerTrace, GroundTruth
        """
        cfg = spi_synth_config if spi_synth_config is not None else SpiSynthConfig()

        data = bytes(data)

        if len(data) == 0:
            raise SideTraceValidationError("synth_spi needs at least one byte")

        e = cfg.samples_per_clock_edge

        # lead idle, 16 edges per byte, 8 extra idle edges between bytes, tail idle
        n = 8 * e + len(data) * 16 * e + (len(data) - 1) * 8 * e + 8 * e

        sigma = e / 16.0
        x = numpy.zeros(n)

        level = 1 if cfg.idle_level == 'high' else 0

        clock_edges = []
        transitions = []

        for i, byte in enumerate(data):
            start = 8 * e + i * 24 * e

            bits = [(byte >> (7 - j)) & 1 for j in range(8)]

            if cfg.bit_order == 'lsb_first':
                bits = bits[::-1]

            for j, bit in enumerate(bits):
                transition = start + 2 * j * e
                rising = transition + e

                if bit != level:
                    direction = 'rising' if bit == 1 else 'falling'
                    sign = -1.0 if bit == 1 else 1.0

                    lo, w = gaussian_pulse(n, transition, sigma, sign * cfg.data_peak_amp)
                    x[lo:lo + len(w)] += w

                    transitions.append((transition, direction))
                    level = bit

                lo, w = gaussian_pulse(n, rising, sigma, -cfg.clock_peak_amp)
                x[lo:lo + len(w)] += w

                clock_edges.append(rising)

        if cfg.noise_sigma > 0:
            x = x + cfg.noise_sigma * counter_noise(cfg.seed, n)

        trace = PowerTrace(x, cfg.sample_rate_hz, label='spi-' + str(cfg.seed))

        return trace, GroundTruth(spi_bytes=data, clock_edges=clock_edges, data_transitions=transitions)

    def crash_templates(self, n_samples=2000):
        """The three fault power patterns: a common preamble followed by a rising peak, a falling peak, or a flat
        stretch and a late rising peak.

        Returns
        -------
        dict of str -> numpy.ndarray
        """
        if n_samples < 100:
            raise SideTraceValidationError("crash templates need at least 100 samples")

        t = numpy.arange(n_samples)

        preamble_end = int(0.4 * n_samples)
        preamble = numpy.where(t < preamble_end, 0.3 * numpy.sin(2 * numpy.pi * t / (n_samples / 20.0)), 0.0)

        width = n_samples / 50.0

        def peak(at, amp):
            return amp * numpy.exp(-0.5 * ((t - at * n_samples) / width) ** 2)

        return {'rising_peak': preamble + peak(0.6, 2.0),
                'falling_peak': preamble + peak(0.6, -2.0),
                'late_peak': preamble + peak(0.85, 2.0)}

    def synth_crashes(self, copies=5, snr_db=20.0, seed=0, n_samples=2000, sample_rate_hz=625e6):
        """Noisy copies of every crash template.

        Returns
        -------
        list of PowerTrace, list of str
            traces and the template each one came from
        """
        templates = self.crash_templates(n_samples)

        traces = []
        labels = []

        k = 0

        for name in sorted(templates.keys()):
            template = templates[name]
            sigma = numpy.sqrt(numpy.mean(template ** 2)) / (10.0 ** (snr_db / 20.0))

            for _ in range(copies):
                noise = counter_noise((seed * 1000003 + k) % 2 ** 64, n_samples)

                traces.append(PowerTrace(template + sigma * noise, sample_rate_hz, label=name))
                labels.append(name)

                k = k + 1

        return traces, labels
