# Tests package for Interior AI Service
