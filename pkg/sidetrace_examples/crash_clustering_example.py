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

from sklearn.metrics import adjusted_rand_score

from findatapy.util.loggermanager import LoggerManager

from sidetrace.analysis.crashclustering import CrashClustering
from sidetrace.analysis.motifdetection import MotifDetection
from sidetrace.synth.tracesynthesizer import TraceSynthesizer
from sidetrace.wavelet.fingerprint import Fingerprint

logger = LoggerManager().getLogger(__name__)

# Choose run_example = 0 for everything
# run_example = 1 - group crash traces by the fault behind them
# run_example = 2 - spot the spin loop of a default fault handler

run_example = 0

###### Crash clustering
if run_example == 1 or run_example == 0:
    traces, labels = TraceSynthesizer().synth_crashes(copies=5, seed=11)

    report = CrashClustering().cluster_crashes(traces, 25e6)

    logger.info(str(report.cluster_count) + " clusters, adjusted Rand index "
                + str(adjusted_rand_score(labels, report.labels)))

    print(report.to_dict())

###### Spin loop
if run_example == 2 or run_example == 0:
    fp = Fingerprint([12, 57, 90, 131] + list(range(160, 240, 6)), 0.3, 64)

    print(MotifDetection().detect_spin_loop(fp).to_dict())
