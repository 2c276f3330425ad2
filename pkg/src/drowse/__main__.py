import sys

from drowse.cli import main

sys.exit(main())
