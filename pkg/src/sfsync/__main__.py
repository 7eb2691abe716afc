from sfsync.cli import main
import sys

sys.exit(main())
