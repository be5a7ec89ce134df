from graftlab.cli_io import main

main()
