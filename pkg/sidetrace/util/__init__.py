from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceException, SideTraceValidationError, SideTraceProcessingError
