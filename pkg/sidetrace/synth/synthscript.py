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


def _check_seed(seed):
    if int(seed) != seed or not 0 <= seed < 2 ** 64:
        raise SideTraceValidationError("seed must be an unsigned 64-bit integer, got " + repr(seed))

    return int(seed)


class SynthScript(object):
    """Event script for a synthetic power trace: a number of clock cycles, branch events which leave a burst of high
    frequency power, peripheral events which leave a large spike with ring-down, and the noise model.

    branch_events
        list of (cycle, burst_amplitude)
    peripheral_events
        list of (cycle, spike_amplitude, ring_decay_cycles)

    """

    def __init__(self, total_cycles, samples_per_clock, branch_events=None, peripheral_events=None, white_sigma=0.0,
                 drift_amplitude=0.0, drift_freq_hz=0.0, baseline_volts=0.0, seed=0,
                 sample_rate_hz=constants.synth_sample_rate_hz):

        if int(total_cycles) != total_cycles or total_cycles < 1:
            raise SideTraceValidationError("total_cycles must be a positive integer, got " + repr(total_cycles))

        if not (math.isfinite(samples_per_clock) and samples_per_clock >= 1):
            raise SideTraceValidationError("samples_per_clock must be >= 1, got " + repr(samples_per_clock))

        if not sample_rate_hz > 0:
            raise SideTraceValidationError("sample_rate_hz must be > 0, got " + repr(sample_rate_hz))

        total_cycles = int(total_cycles)

        branch_events = [(int(c), float(a)) for c, a in (branch_events or [])]
        peripheral_events = [(int(c), float(a), float(d)) for c, a, d in (peripheral_events or [])]

        for c, a in branch_events:
            if not 0 <= c < total_cycles:
                raise SideTraceValidationError("branch event cycle " + str(c) + " is outside [0, "
                                               + str(total_cycles) + ")")
            if a < 0:
                raise SideTraceValidationError("burst amplitude must be >= 0, got " + repr(a))

        if len(set(c for c, _ in branch_events)) != len(branch_events):
            raise SideTraceValidationError("at most one branch event per cycle")

        for c, a, d in peripheral_events:
            if not 0 <= c < total_cycles:
                raise SideTraceValidationError("peripheral event cycle " + str(c) + " is outside [0, "
                                               + str(total_cycles) + ")")
            if a < 0:
                raise SideTraceValidationError("spike amplitude must be >= 0, got " + repr(a))
            if not d > 0:
                raise SideTraceValidationError("ring_decay_cycles must be > 0, got " + repr(d))

        if white_sigma < 0 or drift_amplitude < 0 or drift_freq_hz < 0:
            raise SideTraceValidationError("noise parameters must be >= 0")

        self.total_cycles = total_cycles
        self.samples_per_clock = float(samples_per_clock)
        self.branch_events = sorted(branch_events)
        self.peripheral_events = sorted(peripheral_events)
        self.white_sigma = float(white_sigma)
        self.drift_amplitude = float(drift_amplitude)
        self.drift_freq_hz = float(drift_freq_hz)
        self.baseline_volts = float(baseline_volts)
        self.seed = _check_seed(seed)
        self.sample_rate_hz = float(sample_rate_hz)

    @property
    def clock_hz(self):
        return self.sample_rate_hz / self.samples_per_clock

    @property
    def sample_count(self):
        return int(math.ceil(self.total_cycles * self.samples_per_clock))

    def replace(self, **kwargs):
        """Copy with some fields changed, eg. the same script without peripheral events."""
        d = self.to_dict()
        d.update(kwargs)

        return SynthScript.from_dict(d)

    def to_dict(self):
        return {'total_cycles': self.total_cycles, 'samples_per_clock': self.samples_per_clock,
                'branch_events': [list(e) for e in self.branch_events],
                'peripheral_events': [list(e) for e in self.peripheral_events],
                'white_sigma': self.white_sigma, 'drift_amplitude': self.drift_amplitude,
                'drift_freq_hz': self.drift_freq_hz, 'baseline_volts': self.baseline_volts, 'seed': self.seed,
                'sample_rate_hz': self.sample_rate_hz}

    @staticmethod
    def from_dict(d):
        if not isinstance(d, dict):
            raise SideTraceValidationError("script must be a JSON object")

        unknown = set(d.keys()) - set(SynthScript(1, 1).to_dict().keys())

        if unknown:
            raise SideTraceValidationError("unknown script fields " + ", ".join(sorted(unknown)))

        for k in ('total_cycles', 'samples_per_clock'):
            if k not in d:
                raise SideTraceValidationError("script is missing field '" + k + "'")

        try:
            return SynthScript(**d)
        except (TypeError, ValueError) as e:
            if isinstance(e, SideTraceValidationError):
                raise

            raise SideTraceValidationError("malformed script (" + str(e) + ")")

    @staticmethod
    def aes_like_script(rounds=10, samples_per_clock=64, round_period_cycles=120, round_offsets=(0, 7, 19, 33, 52),
                        lead_cycles=40, tail_cycles=40, burst_amplitude=1.0, white_sigma=0.1, seed=0,
                        sample_rate_hz=constants.synth_sample_rate_hz):
        """Round structured script, eg. rounds=10 for AES-128 and rounds=14 for AES-256. Every round repeats the same
        branch pattern, except the last round which skips its final event (no MixColumns step).

        Returns
        -------
        SynthScript
        """
        if rounds < 1:
            raise SideTraceValidationError("rounds must be >= 1")

        if max(round_offsets) >= round_period_cycles:
            raise SideTraceValidationError("round offsets must fit inside one round period")

        events = []

        for r in range(rounds):
            offsets = round_offsets[:-1] if r == rounds - 1 and len(round_offsets) > 1 else round_offsets

            events.extend((lead_cycles + r * round_period_cycles + o, burst_amplitude) for o in offsets)

        total_cycles = lead_cycles + rounds * round_period_cycles + tail_cycles

        return SynthScript(total_cycles, samples_per_clock, branch_events=events, white_sigma=white_sigma, seed=seed,
                           sample_rate_hz=sample_rate_hz)


class SpiSynthConfig(object):
    """Bus model for synthetic SPI traces. samples_per_clock_edge is the number of samples between a clock edge and
    the next one (so a full SPI clock period is twice that).

    """

    def __init__(self, samples_per_clock_edge=constants.synth_spi_samples_per_clock_edge, clock_peak_amp=1.0,
                 data_peak_amp=0.3, noise_sigma=0.03, seed=0, sample_rate_hz=constants.synth_spi_sample_rate_hz,
                 idle_level=constants.spi_idle_level, bit_order=constants.spi_bit_order):

        if int(samples_per_clock_edge) != samples_per_clock_edge or samples_per_clock_edge < 8:
            raise SideTraceValidationError("samples_per_clock_edge must be an integer >= 8, got "
                                           + repr(samples_per_clock_edge))

        if not clock_peak_amp > 0 or data_peak_amp < 0 or noise_sigma < 0:
            raise SideTraceValidationError("clock_peak_amp must be > 0, data_peak_amp and noise_sigma >= 0")

        if data_peak_amp >= constants.spi_clock_level_fraction * clock_peak_amp:
            raise SideTraceValidationError("data_peak_amp must stay below half the clock_peak_amp so the clock "
                                           + "train can be told apart")

        if idle_level not in ('low', 'high'):
            raise SideTraceValidationError("idle_level must be low or high, got " + repr(idle_level))

        if bit_order not in ('msb_first', 'lsb_first'):
            raise SideTraceValidationError("bit_order must be msb_first or lsb_first, got " + repr(bit_order))

        self.samples_per_clock_edge = int(samples_per_clock_edge)
        self.clock_peak_amp = float(clock_peak_amp)
        self.data_peak_amp = float(data_peak_amp)
        self.noise_sigma = float(noise_sigma)
        self.seed = _check_seed(seed)
        self.sample_rate_hz = float(sample_rate_hz)
        self.idle_level = idle_level
        self.bit_order = bit_order

    def to_dict(self):
        return {'samples_per_clock_edge': self.samples_per_clock_edge, 'clock_peak_amp': self.clock_peak_amp,
                'data_peak_amp': self.data_peak_amp, 'noise_sigma': self.noise_sigma, 'seed': self.seed,
                'sample_rate_hz': self.sample_rate_hz, 'idle_level': self.idle_level, 'bit_order': self.bit_order}


class GroundTruth(object):
    """What the generator actually injected, used as the oracle for every analysis.

    """

    def __init__(self, branch_cycles=None, peripheral_segments=None, spi_bytes=None, clock_edges=None,
                 data_transitions=None):
        self.branch_cycles = sorted(int(c) for c in (branch_cycles or []))
        self.peripheral_segments = [(int(s), int(e)) for s, e in (peripheral_segments or [])]
        self.spi_bytes = bytes(spi_bytes) if spi_bytes is not None else None
        self.clock_edges = [int(c) for c in (clock_edges or [])]
        self.data_transitions = [(int(p), d) for p, d in (data_transitions or [])]

    def to_dict(self):
        d = {'branch_cycles': self.branch_cycles,
             'peripheral_segments': [list(s) for s in self.peripheral_segments]}

        if self.spi_bytes is not None:
            d['spi_bytes'] = self.spi_bytes.hex()
            d['clock_edges'] = self.clock_edges
            d['data_transitions'] = [list(t) for t in self.data_transitions]

        return d

    @staticmethod
    def from_dict(d):
        if not isinstance(d, dict) or 'branch_cycles' not in d:
            raise SideTraceValidationError("ground truth JSON must be an object with branch_cycles")

        try:
            spi_bytes = bytes.fromhex(d['spi_bytes']) if 'spi_bytes' in d else None

            return GroundTruth(d['branch_cycles'], d.get('peripheral_segments'), spi_bytes, d.get('clock_edges'),
                               d.get('data_transitions'))
        except (TypeError, ValueError) as e:
            raise SideTraceValidationError("malformed ground truth (" + str(e) + ")")
