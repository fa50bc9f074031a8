"""Module entry point: ``python -m soliton_pole_lab``."""

from soliton_pole_lab.cli import main

if __name__ == "__main__":
    main()
