import sys

from perctree.cli import main

sys.exit(main())
