from corrhub.cli import main

main()
