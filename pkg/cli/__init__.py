# Command-line front end for gibbssat
