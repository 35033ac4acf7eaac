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
from sidetrace.peripheral.peakdetector import PeakDetector
from sidetrace.peripheral.spidecoder import SpiDecoder
from sidetrace.synth.synthscript import SpiSynthConfig, SynthScript
from sidetrace.synth.tracesynthesizer import TraceSynthesizer
from sidetrace.wavelet.fingerprint import FingerprintRequest
from sidetrace.wavelet.waveletfingerprint import WaveletFingerprint

logger = LoggerManager().getLogger(__name__)

trace_synth = TraceSynthesizer()
peak_detector = PeakDetector()

# Choose run_example = 0 for everything
# run_example = 1 - excise peripheral spikes before fingerprinting
# run_example = 2 - read the bytes an SPI master sent off the power trace

run_example = 0

###### Peripheral excision
if run_example == 1 or run_example == 0:
    script = SynthScript.aes_like_script(rounds=10, seed=7)
    script = script.replace(peripheral_events=[[40 + r * 120 + 85, 50.0, 0.25] for r in (1, 4, 7)])

    with_peripheral, without_peripheral, truth = trace_synth.synth_twins(script)

    segments = peak_detector.detect_peaks(with_peripheral, k=30)

    logger.info("Found " + str(len(segments)) + " peripheral peaks")

    wavelet_fingerprint = WaveletFingerprint()
    fingerprint_comparison = FingerprintComparison()

    raw = wavelet_fingerprint.fingerprint(with_peripheral)
    excised = wavelet_fingerprint.fingerprint(with_peripheral, FingerprintRequest(excise_peripheral=True, peak_k=30))
    clean = wavelet_fingerprint.fingerprint(without_peripheral)

    for name, fp in (('raw', raw), ('excised', excised), ('no peripheral', clean)):
        print(name, fingerprint_comparison.score_fingerprint(fp, truth.branch_cycles).to_dict())

###### SPI decoding
if run_example == 2 or run_example == 0:
    trace, truth = trace_synth.synth_spi(b'sidetrace', SpiSynthConfig(seed=9))

    result = SpiDecoder().decode_spi(trace)

    print(result.data, result.data == truth.spi_bytes)
