"""Monte-Carlo estimators shared by the simulation modules."""
