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


class WaveletSpec(object):
    """Holds the daughter wavelet family and the scale ladder used by the CWT.

    family
        ricker - second derivative of a Gaussian (Mexican hat), real valued and matched to abrupt transients
        morlet - real Morlet, a Gaussian windowed cosine with morlet_center_freq oscillations per scale

    Scales are in samples. Each daughter wavelet is sampled over +/- wavelet_support_scales * a and normalized to
    unit L2 norm, so its footprint is 2 * ceil(support * a) + 1 samples.

    """

    FAMILIES = ('ricker', 'morlet')

    def __init__(self, family=constants.wavelet_family, scales=None,
                 morlet_center_freq=constants.wavelet_morlet_center_freq):

        if family not in WaveletSpec.FAMILIES:
            raise SideTraceValidationError("wavelet family must be one of " + ", ".join(WaveletSpec.FAMILIES)
                                           + ", got " + repr(family))

        if scales is None:
            raise SideTraceValidationError("at least one wavelet scale is needed")

        scales = numpy.atleast_1d(numpy.array(scales, dtype=numpy.float64))

        if len(scales) == 0:
            raise SideTraceValidationError("at least one wavelet scale is needed")

        if not numpy.all(numpy.isfinite(scales)) or numpy.any(scales < 1):
            raise SideTraceValidationError("every wavelet scale must be >= 1 sample")

        if numpy.any(numpy.diff(scales) <= 0):
            raise SideTraceValidationError("wavelet scales must be strictly increasing")

        if family == 'morlet' and not morlet_center_freq > 0:
            raise SideTraceValidationError("morlet_center_freq must be > 0")

        scales.flags.writeable = False

        self.__family = family
        self.__scales = scales
        self.__morlet_center_freq = float(morlet_center_freq)

    @staticmethod
    def default_scales(samples_per_clock, count=constants.wavelet_scale_count):
        """Dyadic-geometric ladder from 1 sample to one clock cycle, so the smallest daughter wavelet resolves
        sub-cycle transients and the largest spans one cycle.

        Parameters
        ----------
        samples_per_clock : float
        count : int

        Returns
        -------
        numpy.ndarray
        """
        if samples_per_clock < 1:
            raise SideTraceValidationError("samples_per_clock must be >= 1, got " + repr(samples_per_clock))

        if samples_per_clock == 1 or count == 1:
            return numpy.array([1.0])

        return numpy.geomspace(1.0, float(samples_per_clock), int(count))

    @staticmethod
    def default(samples_per_clock, family=constants.wavelet_family, count=constants.wavelet_scale_count):
        return WaveletSpec(family=family, scales=WaveletSpec.default_scales(samples_per_clock, count))

    @property
    def family(self): return self.__family

    @property
    def scales(self): return self.__scales

    @property
    def morlet_center_freq(self): return self.__morlet_center_freq

    def half_support(self, scale):
        return int(math.ceil(constants.wavelet_support_scales * scale))

    def footprint(self, scale):
        """Number of samples of the sampled daughter wavelet at this scale."""
        return 2 * self.half_support(scale) + 1

    @property
    def max_footprint(self):
        return self.footprint(self.__scales[-1])

    def kernel(self, scale):
        """Sampled, L2 normalized daughter wavelet psi_a centered on the middle sample.

        Parameters
        ----------
        scale : float
            scale a in samples

        Returns
        -------
        numpy.ndarray of length footprint(scale)
        """
        half = self.half_support(scale)
        x = numpy.arange(-half, half + 1, dtype=numpy.float64) / scale

        gauss = numpy.exp(-0.5 * x ** 2)

        if self.__family == 'ricker':
            psi = (1.0 - x ** 2) * gauss
        else:
            # admissibility correction keeps the real Morlet zero mean
            w0 = self.__morlet_center_freq
            psi = gauss * (numpy.cos(w0 * x) - math.exp(-0.5 * w0 ** 2))

        return psi / numpy.sqrt(numpy.sum(psi ** 2))

    def validate(self, trace_length):
        if self.max_footprint > trace_length:
            raise SideTraceValidationError("largest wavelet scale " + repr(float(self.__scales[-1])) + " has a footprint of "
                                           + str(self.max_footprint) + " samples, longer than the trace ("
                                           + str(trace_length) + " samples)")

    def to_dict(self):
        return {'family': self.__family, 'scales': [float(s) for s in self.__scales],
                'morlet_center_freq': self.__morlet_center_freq}

    def __repr__(self):
        return "WaveletSpec(family=%r, scales=%r)" % (self.__family, [float(s) for s in self.__scales])
