from l0reg.cli import main

if __name__ == '__main__':
    main(prog_name='l0reg')
