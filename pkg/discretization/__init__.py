# discretization package
