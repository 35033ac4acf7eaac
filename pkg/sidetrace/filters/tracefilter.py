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

import numpy
import pandas
from scipy import signal

from findatapy.util.loggermanager import LoggerManager

from sidetrace.filters.spectrum import Spectrum
from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceValidationError

constants = SideTraceConstants()


class TraceFilter(object):
    """Frequency-domain and IIR filtering of power traces.

    At present it implements
        fft_bandpass - zero every DFT bin outside a band, then invert (output stays real)
        butterworth - high-pass/low-pass Butterworth realized as second order sections (bilinear transform with
            prewarping), either causal (single pass) or zero phase (forward then backward)
        spectral_peaks - the strongest components of a spectrum, to choose filter bands

    """

    def __init__(self):
        self.logger = LoggerManager().getLogger(__name__)

    def fft_forward(self, trace):
        """Standard DFT of a trace.

        Parameters
        ----------
        trace : PowerTrace

        Returns
        -------
        Spectrum
        """
        if len(trace) == 0:
            raise SideTraceValidationError("cannot transform an empty trace")

        return Spectrum(numpy.fft.fft(trace.samples), trace.sample_rate_hz)

    def fft_inverse(self, spectrum):
        """Inverse DFT, returning the complex time series."""
        return numpy.fft.ifft(spectrum.bins)

    def fft_bandpass(self, trace, f_lo, f_hi):
        """Brick-wall bandpass: zero all bins whose center frequency lies outside [f_lo, f_hi]. Negative frequency
        bins are kept or zeroed together with their conjugate partners, so the output is real.

        Parameters
        ----------
        trace : PowerTrace
        f_lo : float
            lower band edge in Hz
        f_hi : float
            upper band edge in Hz

        Returns
        -------
        PowerTrace
        """
        nyquist = trace.sample_rate_hz / 2.0

        if not (0 < f_lo < f_hi < nyquist):
            raise SideTraceValidationError("invalid band [" + repr(f_lo) + ", " + repr(f_hi) + "] Hz, need 0 < f_lo < "
                                           + "f_hi < " + repr(nyquist) + " Hz")

        spectrum = self.fft_forward(trace)
        freq = numpy.abs(spectrum.frequencies)

        keep = (freq >= f_lo) & (freq <= f_hi)

        self.logger.debug("Bandpass keeps " + str(int(keep.sum())) + " of " + str(len(spectrum)) + " bins")

        filtered = numpy.fft.ifft(numpy.where(keep, spectrum.bins, 0))

        return trace.with_samples(filtered.real)

    def butterworth(self, trace, spec):
        """Applies a Butterworth high-pass or low-pass filter.

        Parameters
        ----------
        trace : PowerTrace
        spec : FilterSpec
            butterworth_highpass or butterworth_lowpass

        Returns
        -------
        PowerTrace
        """
        if not spec.is_butterworth:
            raise SideTraceValidationError("butterworth needs a Butterworth FilterSpec, got " + spec.kind)

        spec.validate(trace.sample_rate_hz)

        btype = 'highpass' if spec.kind == 'butterworth_highpass' else 'lowpass'

        sos = signal.butter(spec.order, spec.cutoff_hz, btype=btype, fs=trace.sample_rate_hz, output='sos')

        if len(trace) == 0:
            return trace.with_samples(trace.samples)

        if spec.phase_mode == 'zero_phase':
            filtered = signal.sosfiltfilt(sos, trace.samples)
        else:
            warmup = spec.warmup_samples(trace.sample_rate_hz)

            if warmup > len(trace) // 2:
                self.logger.warning("Causal " + btype + " warm-up (~" + str(warmup) + " samples) covers more than half "
                                    + "of the trace")
            else:
                self.logger.debug("Causal " + btype + " warm-up ~" + str(warmup) + " samples")

            filtered = signal.sosfilt(sos, trace.samples)

        return trace.with_samples(filtered)

    def apply(self, trace, spec):
        """Applies any FilterSpec."""
        if spec.kind == 'fft_bandpass':
            return self.fft_bandpass(trace, spec.cutoff_low_hz, spec.cutoff_high_hz)

        return self.butterworth(trace, spec)

    def spectral_peaks(self, spectrum, top_k):
        """The top_k largest magnitude bins in (0, Nyquist], sorted by descending magnitude, ties broken by lower
        frequency. Bins that are numerically zero are never reported, so a constant trace gives no peaks.

        Parameters
        ----------
        spectrum : Spectrum
        top_k : int

        Returns
        -------
        pandas.DataFrame with columns frequency_hz and magnitude
        """
        if top_k is None or int(top_k) != top_k or top_k < 1:
            raise SideTraceValidationError("top_k must be >= 1, got " + repr(top_k))

        if len(spectrum) == 0:
            raise SideTraceValidationError("empty spectrum")

        n = len(spectrum)
        half = numpy.arange(1, n // 2 + 1)

        mag = spectrum.magnitudes
        freq = half * spectrum.resolution_hz

        scale = mag.max()

        df = pandas.DataFrame({'frequency_hz': freq, 'magnitude': mag[half]})

        if scale == 0:
            return df.iloc[0:0].reset_index(drop=True)

        df = df[df['magnitude'] > constants.spectrum_zero_tol * scale]

        # magnitudes equal to rounding error count as ties
        df = df.assign(_rank=(df['magnitude'] / scale).round(constants.spectrum_tie_decimals))
        df = df.sort_values(['_rank', 'frequency_hz'], ascending=[False, True], kind='mergesort')

        return df.drop(columns='_rank').head(int(top_k)).reset_index(drop=True)
