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

from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceValidationError

constants = SideTraceConstants()


class Fingerprint(object):
    """Clock-cycle indices of the high-frequency events of a single trace, a signature of the executed control flow.

    """

    def __init__(self, cycles, theta, samples_per_clock):
        try:
            cycles = numpy.array(cycles, dtype=numpy.float64).reshape(-1)
        except (TypeError, ValueError):
            raise SideTraceValidationError("fingerprint cycles must be a list of integers")

        if numpy.any(cycles != numpy.floor(cycles)) or numpy.any(cycles < 0):
            raise SideTraceValidationError("fingerprint cycles must be non-negative integers")

        cycles = cycles.astype(numpy.int64)

        if numpy.any(numpy.diff(cycles) <= 0):
            raise SideTraceValidationError("fingerprint cycles must be strictly increasing")

        theta = float(theta)
        samples_per_clock = float(samples_per_clock)

        if not 0 < theta < 1:
            raise SideTraceValidationError("theta must lie in (0, 1), got " + repr(theta))

        if not (math.isfinite(samples_per_clock) and samples_per_clock >= 1):
            raise SideTraceValidationError("samples_per_clock must be >= 1, got " + repr(samples_per_clock))

        cycles.flags.writeable = False

        self.__cycles = cycles
        self.__theta = theta
        self.__samples_per_clock = samples_per_clock

    @property
    def cycles(self): return self.__cycles

    @property
    def theta(self): return self.__theta

    @property
    def samples_per_clock(self): return self.__samples_per_clock

    @property
    def span_cycles(self):
        """Cycles from the first to the last event inclusive (0 when empty)."""
        if len(self.__cycles) == 0:
            return 0

        return int(self.__cycles[-1] - self.__cycles[0] + 1)

    def shifted(self, cycles):
        return Fingerprint(self.__cycles + int(cycles), self.__theta, self.__samples_per_clock)

    def __len__(self):
        return len(self.__cycles)

    def __iter__(self):
        return iter(int(c) for c in self.__cycles)

    def __eq__(self, other):
        if not isinstance(other, Fingerprint):
            return NotImplemented

        return self.__theta == other.theta and self.__samples_per_clock == other.samples_per_clock \
               and numpy.array_equal(self.__cycles, other.cycles)

    __hash__ = None

    def __repr__(self):
        return "Fingerprint(n=%d, theta=%r, samples_per_clock=%r)" % (len(self.__cycles), self.__theta,
                                                                      self.__samples_per_clock)


class FingerprintRequest(object):
    """Contains the parameters of a fingerprinting run: threshold, wavelet,
    optional prefilter (typically the Butterworth high-pass used against board noise, or a low-pass on fast cores),
    optional peripheral-peak excision and spectral duplicate radius.

    Excision parameters left as None default to one clock cycle (merge gap) and two clock cycles (guard).

    """

    def __init__(self, theta=constants.wavelet_theta, wavelet_spec=None, prefilter=None, excise_peripheral=False,
                 slot_radius=constants.wavelet_slot_radius, peak_k=constants.peak_mad_k, merge_gap=None, guard=None,
                 detrend=constants.wavelet_detrend):
        self.theta = theta
        self.wavelet_spec = wavelet_spec
        self.prefilter = prefilter
        self.excise_peripheral = excise_peripheral
        self.slot_radius = slot_radius
        self.peak_k = peak_k
        self.merge_gap = merge_gap
        self.guard = guard
        self.detrend = detrend

    @property
    def theta(self): return self.__theta

    @theta.setter
    def theta(self, theta):
        if not 0 < theta < 1:
            raise SideTraceValidationError("theta must lie in (0, 1), got " + repr(theta))

        self.__theta = float(theta)

    @property
    def wavelet_spec(self): return self.__wavelet_spec

    @wavelet_spec.setter
    def wavelet_spec(self, wavelet_spec): self.__wavelet_spec = wavelet_spec

    @property
    def prefilter(self): return self.__prefilter

    @prefilter.setter
    def prefilter(self, prefilter): self.__prefilter = prefilter

    @property
    def excise_peripheral(self): return self.__excise_peripheral

    @excise_peripheral.setter
    def excise_peripheral(self, excise_peripheral): self.__excise_peripheral = bool(excise_peripheral)

    @property
    def slot_radius(self): return self.__slot_radius

    @slot_radius.setter
    def slot_radius(self, slot_radius):
        if slot_radius < 0:
            raise SideTraceValidationError("slot_radius must be >= 0, got " + repr(slot_radius))

        self.__slot_radius = int(slot_radius)

    @property
    def peak_k(self): return self.__peak_k

    @peak_k.setter
    def peak_k(self, peak_k):
        if not peak_k > 0:
            raise SideTraceValidationError("peak_k must be > 0, got " + repr(peak_k))

        self.__peak_k = float(peak_k)

    @property
    def merge_gap(self): return self.__merge_gap

    @merge_gap.setter
    def merge_gap(self, merge_gap): self.__merge_gap = merge_gap

    @property
    def guard(self): return self.__guard

    @guard.setter
    def guard(self, guard): self.__guard = guard

    @property
    def detrend(self): return self.__detrend

    @detrend.setter
    def detrend(self, detrend): self.__detrend = bool(detrend)


class FingerprintDiagnostics(object):
    """Intermediate results of a fingerprinting run, kept for plotting and debugging.

    """

    def __init__(self, theta_abs, candidate_count, spectral_slots, boundary_slots, excised_segments, scalogram=None):
        self.theta_abs = theta_abs
        self.candidate_count = candidate_count
        self.spectral_slots = spectral_slots
        self.boundary_slots = boundary_slots
        self.excised_segments = excised_segments
        self.scalogram = scalogram

    def to_dict(self):
        return {'theta_abs': self.theta_abs, 'candidate_count': int(self.candidate_count),
                'spectral_slots': [int(s) for s in self.spectral_slots],
                'boundary_slots': [int(s) for s in self.boundary_slots],
                'excised_segments': [s.to_dict() for s in self.excised_segments]}
