# Application Services Package