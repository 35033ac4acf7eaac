from sidetrace.filters.filterspec import FilterSpec
from sidetrace.filters.spectrum import Spectrum
from sidetrace.filters.tracefilter import TraceFilter
