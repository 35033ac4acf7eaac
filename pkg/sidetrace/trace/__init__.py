from sidetrace.trace.powertrace import PowerTrace, TraceStats
from sidetrace.trace.tracecalculations import TraceCalculations
from sidetrace.trace.traceio import TraceIO
