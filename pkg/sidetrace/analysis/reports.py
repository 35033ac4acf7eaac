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

"""Result objects of the analysis engines. Each serializes to a dict with stable field names, which the CLI writes
as JSON.

"""


class SimilarityReport(object):

    def __init__(self, metric, score, aligned_length_cycles, smoothing_halfwidth):
        self.metric = metric
        self.score = float(score)
        self.aligned_length_cycles = int(aligned_length_cycles)
        self.smoothing_halfwidth = int(smoothing_halfwidth)

    def to_dict(self):
        return {'metric': self.metric, 'score': self.score, 'aligned_length_cycles': self.aligned_length_cycles,
                'smoothing_halfwidth': self.smoothing_halfwidth}

    def __repr__(self):
        return "SimilarityReport(%s=%.6g over %d cycles)" % (self.metric, self.score, self.aligned_length_cycles)


class MotifReport(object):

    def __init__(self, period_cycles, occurrence_starts, strength):
        self.period_cycles = int(period_cycles)
        self.occurrence_starts = [int(s) for s in occurrence_starts]
        self.strength = float(strength)

    @property
    def occurrences(self):
        return len(self.occurrence_starts)

    def to_dict(self):
        return {'period_cycles': self.period_cycles, 'occurrences': self.occurrences,
                'occurrence_starts': self.occurrence_starts, 'strength': self.strength}

    def __eq__(self, other):
        if not isinstance(other, MotifReport):
            return NotImplemented

        return self.to_dict() == other.to_dict()

    __hash__ = None

    def __repr__(self):
        return "MotifReport(period=%d, occurrences=%d, strength=%.3f)" % (self.period_cycles, self.occurrences,
                                                                          self.strength)


class CrashClusterReport(object):

    def __init__(self, labels, medoids, linkage_threshold, distances=None):
        self.labels = [int(l) for l in labels]
        self.medoids = [int(m) for m in medoids]
        self.linkage_threshold = float(linkage_threshold)
        self.distances = distances

    @property
    def cluster_count(self):
        return len(self.medoids)

    def to_dict(self):
        return {'labels': self.labels, 'medoids': self.medoids, 'linkage_threshold': self.linkage_threshold}


class FingerprintScore(object):
    """Detection quality of a fingerprint against ground truth: recall over the true events and false positives
    relative to the number of true events, with a detected cycle matching a true one within +/- tolerance cycles.

    """

    def __init__(self, detected, existing, matched_existing, unmatched_detected, tolerance_cycles):
        self.detected = int(detected)
        self.existing = int(existing)
        self.matched_existing = int(matched_existing)
        self.unmatched_detected = int(unmatched_detected)
        self.tolerance_cycles = int(tolerance_cycles)

    @property
    def recall(self):
        if self.existing == 0:
            return 1.0

        return self.matched_existing / float(self.existing)

    @property
    def false_positive_rate(self):
        if self.existing == 0:
            return 0.0 if self.unmatched_detected == 0 else float('inf')

        return self.unmatched_detected / float(self.existing)

    def to_dict(self):
        return {'recall': self.recall, 'false_positive_rate': self.false_positive_rate, 'detected': self.detected,
                'existing': self.existing, 'matched_existing': self.matched_existing,
                'unmatched_detected': self.unmatched_detected, 'tolerance_cycles': self.tolerance_cycles}


class SpinLoopReport(object):
    """A trailing strictly periodic run of events, eg. a fault handler spinning in a tight loop after a crash."""

    def __init__(self, detected, onset_cycle=None, period_cycles=None, repeats=0):
        self.detected = bool(detected)
        self.onset_cycle = onset_cycle
        self.period_cycles = period_cycles
        self.repeats = int(repeats)

    def to_dict(self):
        return {'detected': self.detected, 'onset_cycle': self.onset_cycle, 'period_cycles': self.period_cycles,
                'repeats': self.repeats}
