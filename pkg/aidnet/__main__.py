import aidnet.cli as cli


def main():
    cli.aidnet_main()


if __name__ == "__main__":
    main()
