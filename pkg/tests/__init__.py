# Tests package for biharmonic-lab
