from mfdpy.cli import main

main()
