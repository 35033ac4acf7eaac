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

from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceValidationError

constants = SideTraceConstants()


class FilterSpec(object):
    """Holds parameters for the filters applied to traces before fingerprinting.

    kind is one of
        fft_bandpass - brick-wall zeroing of DFT bins outside [cutoff_low_hz, cutoff_high_hz]
        butterworth_highpass - removes drift/low-frequency board noise below cutoff_low_hz
        butterworth_lowpass - removes jitter above cutoff_high_hz (eg. before crash clustering)

    The cutoffs can only be checked against Nyquist once the trace is known, see validate.

    """

    KINDS = ('fft_bandpass', 'butterworth_highpass', 'butterworth_lowpass')
    PHASE_MODES = ('causal', 'zero_phase')

    def __init__(self, kind, cutoff_low_hz=None, cutoff_high_hz=None, order=constants.filter_butterworth_order,
                 phase_mode=constants.filter_phase_mode):

        if kind not in FilterSpec.KINDS:
            raise SideTraceValidationError("filter kind must be one of " + ", ".join(FilterSpec.KINDS) + ", got "
                                           + repr(kind))

        if phase_mode not in FilterSpec.PHASE_MODES:
            raise SideTraceValidationError("phase_mode must be one of " + ", ".join(FilterSpec.PHASE_MODES) + ", got "
                                           + repr(phase_mode))

        if kind in ('fft_bandpass', 'butterworth_highpass') and cutoff_low_hz is None:
            raise SideTraceValidationError(kind + " needs cutoff_low_hz")

        if kind in ('fft_bandpass', 'butterworth_lowpass') and cutoff_high_hz is None:
            raise SideTraceValidationError(kind + " needs cutoff_high_hz")

        if order is None or int(order) != order or order < 1:
            raise SideTraceValidationError("filter order must be a positive integer, got " + repr(order))

        self.__kind = kind
        self.__cutoff_low_hz = None if cutoff_low_hz is None else float(cutoff_low_hz)
        self.__cutoff_high_hz = None if cutoff_high_hz is None else float(cutoff_high_hz)
        self.__order = int(order)
        self.__phase_mode = phase_mode

        for c in (self.__cutoff_low_hz, self.__cutoff_high_hz):
            if c is not None and not (math.isfinite(c) and c > 0):
                raise SideTraceValidationError("filter cutoffs must be > 0, got " + repr(c))

        if kind == 'fft_bandpass' and not self.__cutoff_low_hz < self.__cutoff_high_hz:
            raise SideTraceValidationError("bandpass needs cutoff_low_hz < cutoff_high_hz")

    @staticmethod
    def highpass(cutoff_hz, order=constants.filter_butterworth_order, phase_mode=constants.filter_phase_mode):
        return FilterSpec('butterworth_highpass', cutoff_low_hz=cutoff_hz, order=order, phase_mode=phase_mode)

    @staticmethod
    def lowpass(cutoff_hz, order=constants.filter_butterworth_order, phase_mode=constants.filter_phase_mode):
        return FilterSpec('butterworth_lowpass', cutoff_high_hz=cutoff_hz, order=order, phase_mode=phase_mode)

    @staticmethod
    def bandpass(f_lo, f_hi):
        return FilterSpec('fft_bandpass', cutoff_low_hz=f_lo, cutoff_high_hz=f_hi)

    @staticmethod
    def from_dict(d):
        return FilterSpec(d['kind'], cutoff_low_hz=d.get('cutoff_low_hz'), cutoff_high_hz=d.get('cutoff_high_hz'),
                          order=d.get('order', constants.filter_butterworth_order),
                          phase_mode=d.get('phase_mode', constants.filter_phase_mode))

    def to_dict(self):
        return {'kind': self.__kind, 'cutoff_low_hz': self.__cutoff_low_hz, 'cutoff_high_hz': self.__cutoff_high_hz,
                'order': self.__order, 'phase_mode': self.__phase_mode}

    @property
    def kind(self): return self.__kind

    @property
    def cutoff_low_hz(self): return self.__cutoff_low_hz

    @property
    def cutoff_high_hz(self): return self.__cutoff_high_hz

    @property
    def order(self): return self.__order

    @property
    def phase_mode(self): return self.__phase_mode

    @property
    def is_butterworth(self): return self.__kind.startswith('butterworth')

    @property
    def cutoff_hz(self):
        """The single Butterworth cutoff (high-pass corner or low-pass corner)."""
        if self.__kind == 'butterworth_highpass':
            return self.__cutoff_low_hz
        elif self.__kind == 'butterworth_lowpass':
            return self.__cutoff_high_hz

        return None

    def validate(self, sample_rate_hz):
        """Checks every cutoff lies strictly inside (0, sample_rate/2)."""
        nyquist = sample_rate_hz / 2.0

        for c in (self.__cutoff_low_hz, self.__cutoff_high_hz):
            if c is not None and not c < nyquist:
                raise SideTraceValidationError("filter cutoff " + repr(c) + " Hz is at or beyond Nyquist ("
                                               + repr(nyquist) + " Hz)")

    def warmup_samples(self, sample_rate_hz):
        """Approximate length of the causal IIR start-up transient, 3 * order / normalized cutoff."""
        if not self.is_butterworth:
            return 0

        return int(math.ceil(3 * self.__order / (self.cutoff_hz / (sample_rate_hz / 2.0))))

    def __eq__(self, other):
        if not isinstance(other, FilterSpec):
            return NotImplemented

        return self.to_dict() == other.to_dict()

    __hash__ = None

    def __repr__(self):
        return "FilterSpec(" + ", ".join(k + "=" + repr(v) for k, v in self.to_dict().items()) + ")"
