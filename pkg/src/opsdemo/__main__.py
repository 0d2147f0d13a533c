import sys

from opsdemo.cli import main

sys.exit(main())
