#!/usr/bin/env python3
"""
Interactive setup helper: checks the interpreter, installs requirements.txt,
verifies the imaging stack and optionally writes the synthetic corpora.
"""
import subprocess
import sys
from importlib import metadata

MIN_PYTHON = (3, 9)
STACK = ("numpy", "scipy", "colorama", "tqdm", "pytest", "hypothesis")


def check_python_version():
    found = ".".join(str(part) for part in sys.version_info[:3])
    if sys.version_info < MIN_PYTHON:
        print(f"❌ The classifier needs Python {'.'.join(map(str, MIN_PYTHON))}+, this is {found}")
        return False
    print(f"✅ Python {found} ({sys.executable})")
    return True


def install_dependencies():
    """pip install -r requirements.txt, then report the versions that ended up installed"""
    print("📦 Installing requirements.txt ...")
    result = subprocess.run([sys.executable, "-m", "pip", "install", "-q", "-r", "requirements.txt"])
    if result.returncode != 0:
        print(f"❌ pip exited with status {result.returncode}")
        return False
    for package in STACK:
        try:
            print(f"   • {package} {metadata.version(package)}")
        except metadata.PackageNotFoundError:
            print(f"❌ {package} is still missing after the install")
            return False
    return True


def verify_imports():
    """Import the imaging stack and the CLI module once"""
    try:
        print("\n🧪 Checking imports...")
        import colorama  # noqa: F401
        import numpy  # noqa: F401
        import scipy.ndimage  # noqa: F401
        import scipy.spatial  # noqa: F401
        import tqdm  # noqa: F401

        # and the classifier modules themselves
        import vehicleclassify  # noqa: F401

        print("✅ Setup test passed! Ready to run scripts.")
        return True
    except ImportError as e:
        print(f"❌ Setup test failed - missing package: {e}")
        return False


def generate_demo_corpora():
    """Interactive generation of the synthetic corpora"""
    print("\n🧪 Synthetic Corpora")
    print("=" * 40)
    print("Two small labelled datasets are available for experiments:")
    print("1. synth/inter - boxy vs rounded vehicles (distinct silhouettes)")
    print("2. synth/intra - sedan vs taxi (same silhouette, taxis carry a roof sign)")
    print()

    response = input("Generate them now under synth/? (y/n): ").strip().lower()
    if response != "y":
        print("⚠️  Skipped. Run `python vehicleclassify.py synth --out synth` later.")
        return True
    try:
        subprocess.check_call([sys.executable, "vehicleclassify.py", "synth", "--out", "synth"])
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ Failed to generate corpora: {e}")
        return False


def main():
    """Main setup function"""
    print("🚀 Vehicle Classification System - Local Setup")
    print("=" * 60)

    # Check Python version
    if not check_python_version():
        sys.exit(1)

    # Install dependencies
    if not install_dependencies():
        sys.exit(1)

    # Import check
    if not verify_imports():
        sys.exit(1)

    # Optional demo data
    if not generate_demo_corpora():
        sys.exit(1)

    print("\n🎉 Setup completed successfully!")
    print("\n📋 Next steps:")
    print("1. Train a model: python vehicleclassify.py train --mode inter --data synth/inter --out car.esvc")
    print("2. Classify images: python vehicleclassify.py classify --model car.esvc image.pgm")
    print("3. Or run the experiments: python rest_code/synthetic_experiments.py")
    print("\n💡 Tip: Check README.md for detailed usage instructions")


if __name__ == "__main__":
    main()
