from sidetrace.peripheral.peaksegment import PeakSegment, ExcisedTrace, SpiDecodeConfig, SpiDecodeResult
from sidetrace.peripheral.peakdetector import PeakDetector
from sidetrace.peripheral.spidecoder import SpiDecoder
