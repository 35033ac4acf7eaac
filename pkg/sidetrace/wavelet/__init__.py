from sidetrace.wavelet.waveletspec import WaveletSpec
from sidetrace.wavelet.scalogram import Scalogram, CandidateSet
from sidetrace.wavelet.fingerprint import Fingerprint, FingerprintRequest, FingerprintDiagnostics
from sidetrace.wavelet.waveletfingerprint import WaveletFingerprint
