# Services package: the operations of each analysis module
