# Experiments package
