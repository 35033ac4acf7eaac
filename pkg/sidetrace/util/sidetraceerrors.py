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


class SideTraceException(Exception):
    """Base class for every error raised by sidetrace.

    """
    pass


class SideTraceValidationError(SideTraceException, ValueError):
    """Input does not satisfy a precondition (bad format, out of range parameter, invalid flag).

    """

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source

        if source is not None and line is not None:
            message = str(source) + ", line " + str(line) + ": " + message
        elif line is not None:
            message = "line " + str(line) + ": " + message
        elif source is not None:
            message = str(source) + ": " + message

        super(SideTraceValidationError, self).__init__(message)


class SideTraceProcessingError(SideTraceException):
    """Valid input for which the requested analysis cannot produce a result (eg. all-zero scalogram).

    """
    pass
