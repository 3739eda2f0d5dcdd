"""
総当たりによる正解（オラクル）
"""
