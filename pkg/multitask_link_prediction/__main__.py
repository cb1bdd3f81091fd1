import sys

from multitask_link_prediction.cli import main

sys.exit(main())
