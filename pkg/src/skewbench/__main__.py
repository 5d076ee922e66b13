from skewbench.runner import main
raise SystemExit(main())
