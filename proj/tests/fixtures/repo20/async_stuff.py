import asyncio


async def fetch(url):
    await asyncio.sleep(0)
    return url


class Client:
    async def get(self, url):
        return await fetch(url)
