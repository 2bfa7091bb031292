# numerics package
