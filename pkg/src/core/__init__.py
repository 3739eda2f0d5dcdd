"""
インスタンス・メトリック・解の表現とコスト評価
"""
