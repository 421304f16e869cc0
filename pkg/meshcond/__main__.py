# -*- coding: utf-8 -*-
import sys

from meshcond.cli import main


sys.exit(main())
