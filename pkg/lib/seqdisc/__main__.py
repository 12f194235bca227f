import sys

from seqdisc.cli import main


sys.exit(main())
