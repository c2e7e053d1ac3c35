#!/usr/bin/env python3
import sys

from two_setting_bell.cli import main

if __name__ == "__main__":
    sys.exit(main())
