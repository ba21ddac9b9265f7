# DualAut CLI helpers package
