"""
近似係数と解析関数
"""
