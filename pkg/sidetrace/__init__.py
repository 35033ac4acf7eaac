from sidetrace import (analysis, filters, peripheral, synth, trace, util, wavelet)
