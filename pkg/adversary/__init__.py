# Adversary package
