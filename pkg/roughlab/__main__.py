import sys

from roughlab.cli import main

sys.exit(main())
