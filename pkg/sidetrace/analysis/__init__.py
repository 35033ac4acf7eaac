from sidetrace.analysis.reports import SimilarityReport, MotifReport, CrashClusterReport, FingerprintScore, \
    SpinLoopReport
from sidetrace.analysis.fingerprintcomparison import FingerprintComparison
from sidetrace.analysis.motifdetection import MotifDetection
from sidetrace.analysis.crashclustering import CrashClustering
