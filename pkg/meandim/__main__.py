import sys

from meandim.cli import main

sys.exit(main())
