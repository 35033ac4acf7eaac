from sidetrace.synth.synthscript import SynthScript, SpiSynthConfig, GroundTruth
from sidetrace.synth.tracesynthesizer import TraceSynthesizer
