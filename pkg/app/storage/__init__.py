# Field CSV and JSON report artifacts
