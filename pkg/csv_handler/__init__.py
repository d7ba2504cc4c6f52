# CSV handler package
