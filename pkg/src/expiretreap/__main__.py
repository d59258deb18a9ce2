import sys

from expiretreap.cli import main

sys.exit(main())
