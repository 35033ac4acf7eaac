from sidetrace.cli.sidetracecli import main, build_parser
