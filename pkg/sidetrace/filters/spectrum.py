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


class Spectrum(object):
    """Complex DFT bins of a trace. Bin 0 is DC and the bin resolution is sample_rate / length.

    """

    def __init__(self, bins, sample_rate_hz):
        bins = numpy.array(bins, dtype=numpy.complex128)
        bins.flags.writeable = False

        self.__bins = bins
        self.__sample_rate_hz = float(sample_rate_hz)

    @property
    def bins(self): return self.__bins

    @property
    def sample_rate_hz(self): return self.__sample_rate_hz

    @property
    def resolution_hz(self):
        return self.__sample_rate_hz / len(self.__bins)

    @property
    def frequencies(self):
        """Signed center frequency of every bin (numpy.fft.fftfreq ordering)."""
        return numpy.fft.fftfreq(len(self.__bins), d=1.0 / self.__sample_rate_hz)

    @property
    def magnitudes(self):
        return numpy.abs(self.__bins)

    def __len__(self):
        return len(self.__bins)
