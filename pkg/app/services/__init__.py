"""协议、采样与审计服务"""
