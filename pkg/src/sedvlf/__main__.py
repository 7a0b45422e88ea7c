from sedvlf.cli import main

main()
