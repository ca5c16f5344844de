import sys

from tricoherent.cli import main

sys.exit(main())
