# Aggregation package
