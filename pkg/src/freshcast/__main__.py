import sys

from freshcast.cli import main

sys.exit(main())
