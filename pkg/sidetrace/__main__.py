import sys

from sidetrace.cli.sidetracecli import main

sys.exit(main())
