"""Decision procedure for conjunctions of linear integer constraints.

`solver` finds satisfying assignments or builds refutation witnesses; it is
search code and stays outside the trusted core.  `witness` replays those
witnesses mechanically and is all a checker needs to trust.  This package
init deliberately imports neither, so importing the replayer never loads
the solver.
"""
