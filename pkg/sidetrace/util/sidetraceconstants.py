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

import os


class SideTraceConstants(object):
    """Has various constants required for the sidetrace project. These have been defined as static variables.

    """

    ###### PARALLELISM ######
    # "thread" or "multiprocessing"
    thread_technique = "thread"

    multiprocessing_library = 'multiprocess'  # 'multiprocessing_on_dill' or 'multiprocess' or 'multiprocessing'

    # caps internal parallelism, results never depend on it
    thread_env_variable = 'SIDETRACE_THREADS'

    # use numba kernels for the per-sample scans (otherwise plain numpy)
    use_numba = True

### Trace IO ###########################################################################################################
    trace_bin_magic = b'PSCT'
    trace_bin_version = 1

    scalogram_bin_magic = b'PSCW'

    # two column CSV traces are rejected when any time delta deviates from the median by more than this
    csv_uniform_tolerance = 0.01

    csv_time_column = 'time_s'
    csv_voltage_column = 'voltage_v'

### Filters ############################################################################################################
    # 'causal' (single pass) or 'zero_phase' (forward then backward)
    filter_phase_mode = 'causal'
    filter_butterworth_order = 5

    # magnitudes below this fraction of the largest bin are treated as numerically zero
    spectrum_zero_tol = 1e-12
    spectrum_tie_decimals = 9

### Wavelet fingerprint ################################################################################################
    # 'ricker' or 'morlet'
    wavelet_family = 'ricker'
    wavelet_scale_count = 8
    wavelet_morlet_center_freq = 5.0

    # daughter wavelets are sampled over +/- this many scales
    wavelet_support_scales = 5.0

    wavelet_theta = 0.3
    wavelet_slot_radius = 2
    wavelet_detrend = True

### Analysis ###########################################################################################################
    # 'mse' or 'pearson'
    compare_metric = 'pearson'
    compare_smoothing_halfwidth = 2

    motif_strength_cutoff = 0.5
    motif_smoothing_halfwidth = 2

    # prefer the shortest lag whose strength is within this fraction of the best lag
    motif_fundamental_ratio = 0.9

    # consecutive occurrences must be within this fraction of the period
    motif_gap_tolerance = 0.2

    crash_lag_fraction = 0.05
    crash_lowpass_order = 4
    crash_linkage_threshold = 0.5

    spin_loop_max_period = 16
    spin_loop_min_repeats = 8

    score_tolerance_cycles = 1

### Peripheral #########################################################################################################
    peak_mad_k = 8.0

    # merge gap and guard are expressed in clock cycles when the clock is known
    peak_merge_gap_cycles = 1.0
    peak_guard_cycles = 2.0

    # fallbacks (in samples) when the clock is unknown
    peak_merge_gap_samples = 16
    peak_guard_samples = 32

    spi_clock_peak_k = 8.0
    spi_bits_per_word = 8
    spi_bit_order = 'msb_first'
    spi_idle_level = 'low'

    # fraction of the largest drop a peak needs to be counted as a clock edge
    spi_clock_level_fraction = 0.5

    # a gap longer than this many clock periods ends a word
    spi_word_gap_periods = 4.0

    # two sided edge classification threshold relative to the median transition amplitude
    spi_edge_threshold_fraction = 0.5

    # data transitions smaller than this fraction of the clock peak are treated as noise
    spi_edge_floor_fraction = 0.05

### Synth ##############################################################################################################
    synth_sample_rate_hz = 3.125e9
    synth_spi_sample_rate_hz = 1.25e9
    synth_spi_samples_per_clock_edge = 32

### Plotting ###########################################################################################################
    plot_width_inches = 10.0
    plot_height_inches = 4.0
    plot_svg_hashsalt = 'sidetrace'

    # overwrite field variables with those listed in SideTraceCred
    def __init__(self):
        try:
            from sidetrace.util.sidetracecred import SideTraceCred
            cred_keys = SideTraceCred.__dict__.keys()

            for k in SideTraceConstants.__dict__.keys():
                if k in cred_keys and '__' not in k:
                    setattr(SideTraceConstants, k, getattr(SideTraceCred, k))
        except ImportError:
            pass

    def thread_no(self):
        """Number of workers for internal parallelism, capped by the SIDETRACE_THREADS environment variable.

        Returns
        -------
        int
        """
        cores = os.cpu_count() or 1

        cap = os.environ.get(self.thread_env_variable)

        if cap is None or cap.strip() == '':
            return cores

        try:
            cap = int(cap)
        except ValueError:
            from sidetrace.util.sidetraceerrors import SideTraceValidationError

            raise SideTraceValidationError(self.thread_env_variable + " must be a positive integer, got " + repr(cap))

        if cap < 1:
            from sidetrace.util.sidetraceerrors import SideTraceValidationError

            raise SideTraceValidationError(self.thread_env_variable + " must be a positive integer, got " + repr(cap))

        return min(cap, cores)
