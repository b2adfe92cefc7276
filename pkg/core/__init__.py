# Core package for gibbssat
