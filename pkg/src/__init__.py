"""
Uniform cost-distance Steiner tree toolkit
"""
