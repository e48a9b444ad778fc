from omsim.cli import main

raise SystemExit(main())
