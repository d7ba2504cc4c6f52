# Learning package
