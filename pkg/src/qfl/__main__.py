from qfl.cli import main

main()
