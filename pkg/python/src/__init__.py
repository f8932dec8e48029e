# shearflow Python package
