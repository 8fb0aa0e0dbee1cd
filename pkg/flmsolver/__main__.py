import sys

from flmsolver.main import main

sys.exit(main())
