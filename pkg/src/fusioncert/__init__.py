"""Classical compatibility checks for hybrid observational and interventional data."""
