"""Command-line front end: configuration, suites and reports."""
