# problems package
