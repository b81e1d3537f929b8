from lcscore.cli import main

raise SystemExit(main())
