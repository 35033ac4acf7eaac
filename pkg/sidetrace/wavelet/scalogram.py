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

from sidetrace.util.sidetraceerrors import SideTraceValidationError


class Scalogram(object):
    """Wavelet coefficient matrix W_x(t, a): one row per scale, one column per time slot (sample).

    """

    def __init__(self, coefficients, scales, sample_rate_hz):
        coefficients = numpy.array(coefficients, dtype=numpy.float64)
        scales = numpy.array(scales, dtype=numpy.float64)

        if coefficients.ndim != 2 or coefficients.shape[0] != len(scales):
            raise SideTraceValidationError("scalogram must be n x m with one row per scale, got shape "
                                           + str(coefficients.shape) + " for " + str(len(scales)) + " scales")

        if not numpy.all(numpy.isfinite(coefficients)):
            raise SideTraceValidationError("scalogram holds non-finite coefficients")

        coefficients.flags.writeable = False
        scales.flags.writeable = False

        self.__coefficients = coefficients
        self.__scales = scales
        self.__sample_rate_hz = float(sample_rate_hz)

    @property
    def coefficients(self): return self.__coefficients

    @property
    def scales(self): return self.__scales

    @property
    def sample_rate_hz(self): return self.__sample_rate_hz

    @property
    def shape(self): return self.__coefficients.shape

    def max_abs(self):
        if self.__coefficients.size == 0:
            return 0.0

        return float(numpy.max(numpy.abs(self.__coefficients)))


class CandidateSet(object):
    """Possible locations of high-frequency changes: every (time slot, scale) whose |W| is a row-wise local maximum
    above theta_abs = theta * max |W|.

    Entries are held as parallel arrays ordered by time slot, then scale index.

    """

    def __init__(self, time_slots, scale_indices, magnitudes, theta, theta_abs):
        time_slots = numpy.asarray(time_slots, dtype=numpy.int64)
        scale_indices = numpy.asarray(scale_indices, dtype=numpy.int64)
        magnitudes = numpy.asarray(magnitudes, dtype=numpy.float64)

        if not (len(time_slots) == len(scale_indices) == len(magnitudes)):
            raise SideTraceValidationError("candidate arrays must have equal lengths")

        if numpy.any(magnitudes <= theta_abs):
            raise SideTraceValidationError("every candidate magnitude must exceed theta_abs")

        order = numpy.lexsort((scale_indices, time_slots))

        self.__time_slots = time_slots[order]
        self.__scale_indices = scale_indices[order]
        self.__magnitudes = magnitudes[order]
        self.__theta = float(theta)
        self.__theta_abs = float(theta_abs)

        for a in (self.__time_slots, self.__scale_indices, self.__magnitudes):
            a.flags.writeable = False

    @staticmethod
    def from_slots(time_slots, theta=0.5, theta_abs=0.0):
        """Singleton-scale candidates of unit magnitude, eg. to feed deduplicated slots back into dedupe_spectral."""
        time_slots = numpy.asarray(time_slots, dtype=numpy.int64)

        return CandidateSet(time_slots, numpy.zeros(len(time_slots)), numpy.ones(len(time_slots)), theta, theta_abs)

    @property
    def time_slots(self): return self.__time_slots

    @property
    def scale_indices(self): return self.__scale_indices

    @property
    def magnitudes(self): return self.__magnitudes

    @property
    def theta(self): return self.__theta

    @property
    def theta_abs(self): return self.__theta_abs

    def to_frame(self):
        return pandas.DataFrame({'time_slot': self.__time_slots, 'scale_index': self.__scale_indices,
                                 'magnitude': self.__magnitudes})

    def __len__(self):
        return len(self.__time_slots)
