from freesub.cli import main

main()
