"""
matchability
アーベル群と体拡大におけるマッチングの判定・証明書・構成
"""
