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

from findatapy.util.loggermanager import LoggerManager

from sidetrace.analysis.fingerprintcomparison import FingerprintComparison
from sidetrace.analysis.motifdetection import MotifDetection
from sidetrace.filters.filterspec import FilterSpec
from sidetrace.plot.svgplot import SvgPlot
from sidetrace.synth.synthscript import SynthScript
from sidetrace.synth.tracesynthesizer import TraceSynthesizer
from sidetrace.wavelet.fingerprint import FingerprintRequest
from sidetrace.wavelet.waveletfingerprint import WaveletFingerprint

logger = LoggerManager().getLogger(__name__)

trace_synth = TraceSynthesizer()
wavelet_fingerprint = WaveletFingerprint()
fingerprint_comparison = FingerprintComparison()
motif_detection = MotifDetection()

# Choose run_example = 0 for everything
# run_example = 1 - fingerprint a synthetic AES-128 style trace and score it against ground truth
# run_example = 2 - tell two executions apart which take a different branch
# run_example = 3 - count cipher rounds (AES-128 vs AES-256)
# run_example = 4 - fingerprint through board drift with a high-pass prefilter

run_example = 0

###### Fingerprint and score against ground truth
if run_example == 1 or run_example == 0:
    script = SynthScript.aes_like_script(rounds=10, seed=1)

    trace, truth = trace_synth.synth_trace(script)

    fp, diagnostics = wavelet_fingerprint.fingerprint(trace, return_diagnostics=True)

    score = fingerprint_comparison.score_fingerprint(fp, truth.branch_cycles)

    logger.info("Recall " + str(score.recall) + ", false positive rate " + str(score.false_positive_rate))

    SvgPlot().plot_trace(trace, 'aes128_fingerprint.svg', fingerprint=fp, title='AES-128 like trace')

###### Different branch taken
if run_example == 2 or run_example == 0:
    base = SynthScript(400, 64, branch_events=[(30, 1.0), (90, 1.0), (150, 1.0), (300, 1.0)], white_sigma=0.1, seed=2)
    other = base.replace(branch_events=[[30, 1.0], [90, 1.0], [210, 1.0], [300, 1.0]], seed=3)
    again = base.replace(seed=4)

    fp_base = wavelet_fingerprint.fingerprint(trace_synth.synth_trace(base)[0])
    fp_other = wavelet_fingerprint.fingerprint(trace_synth.synth_trace(other)[0])
    fp_again = wavelet_fingerprint.fingerprint(trace_synth.synth_trace(again)[0])

    print(fingerprint_comparison.compare_fingerprints(fp_base, fp_again))
    print(fingerprint_comparison.compare_fingerprints(fp_base, fp_other))

###### Cipher rounds
if run_example == 3 or run_example == 0:
    for rounds in (10, 14):
        trace, _ = trace_synth.synth_trace(SynthScript.aes_like_script(rounds=rounds, seed=5))

        fp = wavelet_fingerprint.fingerprint(trace)

        report = motif_detection.detect_motif(fp, 20, 300)

        print(report)

        SvgPlot().plot_fingerprint(fp, 'rounds_' + str(rounds) + '.svg', motif=report)

###### High-pass against drift
if run_example == 4 or run_example == 0:
    script = SynthScript(400, 64, branch_events=[(40, 1.0), (200, 1.0), (330, 1.0)], white_sigma=0.1,
                         drift_amplitude=5.0, drift_freq_hz=2e5, seed=6)

    trace, truth = trace_synth.synth_trace(script)

    fr = FingerprintRequest(prefilter=FilterSpec.highpass(2e6, phase_mode='zero_phase'))

    fp = wavelet_fingerprint.fingerprint(trace, fr)

    print(fingerprint_comparison.score_fingerprint(fp, truth.branch_cycles).to_dict())
