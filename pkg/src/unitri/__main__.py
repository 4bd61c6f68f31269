import sys

from unitri.cli import main

sys.exit(main())
